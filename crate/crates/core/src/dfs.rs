//! Decoherence-free subspace.
//!
//! The generator annihilates every dyad `|d_n⟩⟨d_m|` built from dark-mode
//! number states `|d_n⟩ = (B†)ⁿ|00⟩/√n!`, including coherences between
//! different dark numbers. The constructive description here is checked
//! against the numerical kernel of the generator.

use crate::algebra::{build_generators, similarity_u1, transfer_operator, Branch};
use crate::error::{Error, Result};
use crate::fock::{build_basis, dark_mode, number_state, re, CMatrix, FockBasis, Ket};
use crate::liouvillian::{build_gamma_collective, dyad, null_space, vectorize, Propagator, KERNEL_TOLERANCE};

/// Bound on `|Γρ|/|ρ|` for a certified state.
pub const GENERATOR_TOLERANCE: f64 = 1e-10;

/// Bound on `|e^{Γt}ρ − ρ|/|ρ|` for a certified state.
pub const EVOLUTION_TOLERANCE: f64 = 1e-9;

/// Dimensionless times `ςt` at which invariance is tested.
pub const CERTIFY_TIMES: [f64; 2] = [1.0, 10.0];

/// Dark-mode number states `n = 0..=max_total_photons`.
pub fn dark_basis(max_total_photons: usize) -> Result<Vec<Ket>> {
    let basis = build_basis(max_total_photons);
    let raise = dark_mode(basis).dagger();
    let mut ket = number_state(0, 0, basis)?;
    let mut out = vec![ket.clone()];
    for n in 1..=max_total_photons {
        ket = raise.apply(&ket)?.scaled(re(1.0 / (n as f64).sqrt()));
        out.push(ket.clone());
    }
    Ok(out)
}

/// Unnormalized zero-mode dyad `exp(−K₋) exp(β₊S₊) exp(β₋S₋) |seed⟩⟨seed'|`
/// with seed `|n0⟩⟨m0|` on the `+` branch and `|0n⟩⟨0m|` on the `−` branch.
///
/// The `+` branch gives `2^{−(n+m)/2} |d_n⟩⟨d_m|` and the `−` branch
/// `(−1)^{n+m} 2^{(n+m)/2} |d_n⟩⟨d_m|`.
pub fn stso_state(n: usize, m: usize, branch: Branch, basis: FockBasis) -> Result<CMatrix> {
    let (ket, bra) = match branch {
        Branch::Plus => ((n, 0), (m, 0)),
        Branch::Minus => ((0, n), (0, m)),
    };
    let seed = dyad(basis, ket, bra)?;
    let gens = build_generators(basis)?;
    let (bp, bm) = branch.betas();
    let x = transfer_operator(bp, bm, &gens)?;
    let rotated = x.matrix() * seed * x.matrix().adjoint();
    similarity_u1(-1.0, &gens)?.apply(&rotated)
}

/// Unit trace when the trace is nonzero, unit Frobenius norm otherwise.
pub fn normalize_dyad(m: &CMatrix) -> Result<CMatrix> {
    let tr = m.trace();
    if tr.norm() > 1e-12 {
        return Ok(m / tr);
    }
    let f = m.norm();
    if f == 0.0 {
        return Err(Error::InvalidParameter("cannot normalize a zero matrix".into()));
    }
    Ok(m / re(f))
}

/// Outcome of [`certify`].
#[derive(Debug, Clone, PartialEq)]
pub struct DfsCertificate {
    pub state: CMatrix,
    pub generator_residual: f64,
    pub evolution_residual: f64,
    pub passed: bool,
}

/// Checks that `state` is annihilated by the generator and left unchanged
/// by the propagator at [`CERTIFY_TIMES`].
pub fn certify(state: &CMatrix, decay_rate: f64, basis: FockBasis) -> Result<DfsCertificate> {
    let gamma = build_gamma_collective(decay_rate, basis)?;
    certify_with(state, decay_rate, &Propagator::new(&gamma), &gamma)
}

/// [`certify`] with a prebuilt generator and propagator.
pub fn certify_with(
    state: &CMatrix,
    decay_rate: f64,
    propagator: &Propagator,
    gamma: &crate::liouvillian::SuperOperator,
) -> Result<DfsCertificate> {
    let norm = state.norm();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("cannot certify a zero matrix".into()));
    }
    let generator_residual = gamma.apply(state)?.norm() / norm;
    let mut evolution_residual: f64 = 0.0;
    for st in CERTIFY_TIMES {
        let out = propagator.apply(state, st / decay_rate);
        evolution_residual = evolution_residual.max((out - state).norm() / norm);
    }
    Ok(DfsCertificate {
        state: state.clone(),
        generator_residual,
        evolution_residual,
        passed: generator_residual <= GENERATOR_TOLERANCE && evolution_residual <= EVOLUTION_TOLERANCE,
    })
}

/// Mutual projection residuals between the dark-dyad span and the
/// numerical kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelComparison {
    pub kernel_dim: usize,
    pub dark_dim: usize,
    /// Largest residual of a dark dyad projected onto the kernel.
    pub dark_in_kernel: f64,
    /// Largest residual of a kernel vector projected onto the dark span.
    pub kernel_in_dark: f64,
}

impl KernelComparison {
    pub fn agrees(&self, tol: f64) -> bool {
        self.kernel_dim == self.dark_dim && self.dark_in_kernel <= tol && self.kernel_in_dark <= tol
    }
}

/// Compares `span{|d_n⟩⟨d_m|}` with the SVD kernel of the generator.
pub fn compare_with_kernel(max_total_photons: usize, decay_rate: f64) -> Result<KernelComparison> {
    let basis = build_basis(max_total_photons);
    let gamma = build_gamma_collective(decay_rate, basis)?;
    let kernel: Vec<_> = null_space(&gamma, KERNEL_TOLERANCE)?
        .into_iter()
        .map(|v| v.into_data())
        .collect();
    let dark = dark_basis(max_total_photons)?;
    let mut dyads = Vec::new();
    for dn in &dark {
        for dm in &dark {
            dyads.push(vectorize(&dn.outer(dm)));
        }
    }
    let residual = |v: &crate::fock::CVector, span: &[crate::fock::CVector]| {
        let mut r = v.clone();
        for b in span {
            let c = b.dotc(v);
            r -= b * c;
        }
        r.norm()
    };
    let dark_in_kernel = dyads.iter().map(|v| residual(v, &kernel)).fold(0.0, f64::max);
    let kernel_in_dark = kernel.iter().map(|v| residual(v, &dyads)).fold(0.0, f64::max);
    Ok(KernelComparison {
        kernel_dim: kernel.len(),
        dark_dim: dyads.len(),
        dark_in_kernel,
        kernel_in_dark,
    })
}
