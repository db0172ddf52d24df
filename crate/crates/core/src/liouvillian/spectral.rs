//! Spectrum and kernel of the generator.

use nalgebra::Schur;

use super::{SuperOperator, VectorizedState};
use crate::error::{Error, Result};
use crate::fock::{CMatrix, C64};

/// Eigenvalues closer than this are treated as one degenerate level.
pub const CLUSTER_RADIUS: f64 = 1e-8;

/// Default relative singular-value threshold for the kernel.
pub const KERNEL_TOLERANCE: f64 = 1e-10;

/// A group of numerically coincident eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCluster {
    pub center: C64,
    pub multiplicity: usize,
}

/// Eigenvalues of the generator, sorted by decreasing real part (ties by
/// imaginary part).
pub fn spectrum(gamma: &SuperOperator) -> Result<Vec<C64>> {
    let mut values = eigenvalues(gamma.matrix())?;
    values.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    Ok(values)
}

const SCHUR_EPS: f64 = 1e-14;
const SCHUR_SWEEPS_PER_ROW: usize = 1000;

/// Eigenvalues of a dense complex matrix by Schur iteration. Real matrices
/// (the generator always is one) go through the real Schur form.
pub(crate) fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    let max_iter = SCHUR_SWEEPS_PER_ROW * m.nrows().max(1);
    let failed = || Error::Decomposition("Schur iteration did not converge".into());
    if m.iter().all(|z| z.im == 0.0) {
        let real = m.map(|z| z.re);
        let schur = Schur::try_new(real, SCHUR_EPS, max_iter).ok_or_else(failed)?;
        Ok(schur.complex_eigenvalues().iter().copied().collect())
    } else {
        let schur = Schur::try_new(m.clone(), SCHUR_EPS, max_iter).ok_or_else(failed)?;
        let values = schur.eigenvalues().ok_or_else(failed)?;
        Ok(values.iter().copied().collect())
    }
}

/// Groups values by single linkage: after sorting, a value joins the current
/// cluster when it lies within `radius` of the previous one.
pub fn cluster_eigenvalues(values: &[C64], radius: f64) -> Vec<EigenCluster> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for v in sorted {
        match groups.last_mut() {
            Some(g) if (v - *g.last().unwrap()).norm() <= radius => g.push(v),
            _ => groups.push(vec![v]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let n = g.len();
            EigenCluster {
                center: g.iter().sum::<C64>() / n as f64,
                multiplicity: n,
            }
        })
        .collect()
}

/// Orthonormal kernel basis: right singular vectors whose singular values
/// are at most `tol` times the largest one.
pub fn null_space(gamma: &SuperOperator, tol: f64) -> Result<Vec<VectorizedState>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("kernel tolerance must be positive, got {tol}")));
    }
    let svd = gamma.matrix().clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Decomposition("SVD returned no right vectors".into()))?;
    let smax = svd.singular_values.max();
    let cutoff = tol * smax;
    let mut picked: Vec<(f64, usize)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(k, &s)| (s, k))
        .collect();
    picked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    picked
        .into_iter()
        .map(|(_, k)| VectorizedState::new(gamma.basis(), v_t.row(k).adjoint()))
        .collect()
}
