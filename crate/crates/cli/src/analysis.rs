//! Generator spectrum and decoherence-free certificates.

use serde::Serialize;

use twocav::algebra::{predicted_spectrum, Branch};
use twocav::dfs::{certify_with, compare_with_kernel, normalize_dyad, stso_state, KernelComparison};
use twocav::fock::{build_basis, C64};
use twocav::liouvillian::{build_gamma_collective, build_gamma_two_mode, cluster_eigenvalues, spectrum, Propagator, CLUSTER_RADIUS};

use crate::error::CliError;

/// Mutual projection residual allowed between kernel and dark span.
pub const KERNEL_AGREEMENT: f64 = 1e-9;

/// A numerical eigenvalue cluster next to the predicted multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumRow {
    pub center_re: f64,
    pub center_im: f64,
    pub multiplicity: usize,
    pub predicted: f64,
    pub predicted_multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub decay_rate: f64,
    pub truncation: usize,
    pub eigenvalue_count: usize,
    pub passed: bool,
    pub rows: Vec<SpectrumRow>,
}

/// Clusters the numerical spectrum and matches it against the predicted
/// multiset; clusters match when their centers lie within `tolerance`.
pub fn spectrum_report(decay_rate: f64, truncation: usize, tolerance: f64) -> Result<SpectrumReport, CliError> {
    let basis = build_basis(truncation);
    let values = spectrum(&build_gamma_two_mode(decay_rate, basis)?)?;
    let numeric = cluster_eigenvalues(&values, CLUSTER_RADIUS);
    let predicted: Vec<C64> = predicted_spectrum(basis, decay_rate, Branch::Plus)
        .into_iter()
        .map(|x| C64::new(x, 0.0))
        .collect();
    let predicted = cluster_eigenvalues(&predicted, CLUSTER_RADIUS);

    let mut used = vec![false; predicted.len()];
    let mut rows = Vec::new();
    for c in &numeric {
        let hit = predicted
            .iter()
            .enumerate()
            .find(|(k, p)| !used[*k] && (p.center - c.center).norm() <= tolerance);
        let (predicted, predicted_multiplicity) = match hit {
            Some((k, p)) => {
                used[k] = true;
                (p.center.re, p.multiplicity)
            }
            None => (f64::NAN, 0),
        };
        rows.push(SpectrumRow {
            center_re: c.center.re,
            center_im: c.center.im,
            multiplicity: c.multiplicity,
            predicted,
            predicted_multiplicity,
        });
    }
    for (k, p) in predicted.iter().enumerate() {
        if !used[k] {
            rows.push(SpectrumRow {
                center_re: f64::NAN,
                center_im: f64::NAN,
                multiplicity: 0,
                predicted: p.center.re,
                predicted_multiplicity: p.multiplicity,
            });
        }
    }
    let passed = rows.iter().all(|r| r.multiplicity == r.predicted_multiplicity);
    Ok(SpectrumReport {
        decay_rate,
        truncation,
        eigenvalue_count: values.len(),
        passed,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfsRow {
    pub n: usize,
    pub m: usize,
    pub generator_residual: f64,
    pub evolution_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelSummary {
    pub kernel_dim: usize,
    pub dark_dim: usize,
    pub dark_in_kernel: f64,
    pub kernel_in_dark: f64,
    pub passed: bool,
}

impl From<&KernelComparison> for KernelSummary {
    fn from(k: &KernelComparison) -> Self {
        Self {
            kernel_dim: k.kernel_dim,
            dark_dim: k.dark_dim,
            dark_in_kernel: k.dark_in_kernel,
            kernel_in_dark: k.kernel_in_dark,
            passed: k.agrees(KERNEL_AGREEMENT),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfsReport {
    pub decay_rate: f64,
    pub truncation: usize,
    pub passed: bool,
    pub kernel: KernelSummary,
    pub certificates: Vec<DfsRow>,
}

/// Certifies every zero-mode dyad `n, m ≤ truncation` and compares their
/// span with the numerical kernel.
pub fn dfs_report(decay_rate: f64, truncation: usize) -> Result<DfsReport, CliError> {
    let basis = build_basis(truncation);
    let gamma = build_gamma_collective(decay_rate, basis)?;
    let propagator = Propagator::new(&gamma);
    let mut certificates = Vec::new();
    for n in 0..=truncation {
        for m in 0..=truncation {
            let state = normalize_dyad(&stso_state(n, m, Branch::Plus, basis)?)?;
            let c = certify_with(&state, decay_rate, &propagator, &gamma)?;
            certificates.push(DfsRow {
                n,
                m,
                generator_residual: c.generator_residual,
                evolution_residual: c.evolution_residual,
                passed: c.passed,
            });
        }
    }
    let kernel = KernelSummary::from(&compare_with_kernel(truncation, decay_rate)?);
    let passed = kernel.passed && certificates.iter().all(|c| c.passed);
    Ok(DfsReport {
        decay_rate,
        truncation,
        passed,
        kernel,
        certificates,
    })
}
