//! Entanglement measures between the two cavities.
//!
//! Qubit states live on `{|00>, |01>, |10>, |11>}` (first label is cavity
//! 1). Complex conjugation is taken entrywise in that fixed basis.

use nalgebra::{Matrix4, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fock::{check_density, pure_density, CMatrix, DensityMatrix, Ket, C64};
use crate::liouvillian::eigenvalues;

/// Largest population allowed outside a block before a state is refused.
pub const LEAKAGE_TOLERANCE: f64 = 1e-10;

/// Negative eigenvalues of `ρ ρ̃` down to this are rounding and clamp to 0.
pub const CLAMP_TOLERANCE: f64 = 1e-10;

const QUBIT_LABELS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

/// A two-qubit density matrix in the ordered basis `|00>, |01>, |10>, |11>`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitDensity {
    matrix: CMatrix,
}

impl QubitDensity {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != 4 || matrix.ncols() != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                got: matrix.nrows().max(matrix.ncols()),
            });
        }
        check_density(&matrix)?;
        Ok(Self { matrix })
    }

    /// Restricts a Fock-space state to the qubit block. Labels missing from
    /// a small truncation count as empty.
    pub fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let basis = rho.basis();
        let idx: Vec<Option<usize>> = QUBIT_LABELS.iter().map(|&(a, b)| basis.index(a, b)).collect();
        let inside: f64 = idx.iter().flatten().map(|&i| rho.matrix()[(i, i)].re).sum();
        let population = rho.trace().re - inside;
        if population > LEAKAGE_TOLERANCE {
            return Err(Error::Leakage {
                population,
                block: "two-qubit",
            });
        }
        let mut m = CMatrix::zeros(4, 4);
        for (r, ri) in idx.iter().enumerate() {
            for (c, ci) in idx.iter().enumerate() {
                if let (Some(i), Some(j)) = (ri, ci) {
                    m[(r, c)] = rho.matrix()[(*i, *j)];
                }
            }
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// `σ_y ⊗ σ_y` in the computational basis.
fn sigma_yy() -> CMatrix {
    let m = Matrix4::new(
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0,
    );
    CMatrix::from_iterator(4, 4, m.iter().map(|&x| C64::new(x, 0.0)))
}

/// Spin-flipped state `(σ_y ⊗ σ_y) ρ* (σ_y ⊗ σ_y)`.
pub fn spin_flip(rho: &QubitDensity) -> CMatrix {
    let yy = sigma_yy();
    &yy * rho.matrix.conjugate() * &yy
}

/// Wootters concurrence `max(0, λ₁ − λ₂ − λ₃ − λ₄)`, with `λᵢ` the
/// descending square roots of the eigenvalues of `ρ ρ̃`.
///
/// With `ρ = W W†` (`W = V √p` from the eigen-decomposition of ρ) those
/// square roots are the singular values of `τ = Wᵀ (σ_y ⊗ σ_y) W`, since
/// `ρ ρ̃` and `τ† τ` share their nonzero spectrum. The singular values carry
/// absolute errors near machine precision, whereas square roots of the
/// eigenvalues of `ρ ρ̃` turn rounding noise of 1e-16 into 1e-8 for
/// rank-deficient states.
pub fn concurrence_2qubit(rho: &QubitDensity) -> Result<f64> {
    let eig = SymmetricEigen::new(rho.matrix().clone());
    let mut w = eig.eigenvectors.clone();
    for (j, p) in eig.eigenvalues.iter().enumerate() {
        if *p < -CLAMP_TOLERANCE {
            return Err(Error::NotPositive { min_eigenvalue: *p });
        }
        let root = C64::new(p.max(0.0).sqrt(), 0.0);
        for z in w.column_mut(j).iter_mut() {
            *z *= root;
        }
    }
    let tau = w.transpose() * sigma_yy() * &w;
    let mut lambdas: Vec<f64> = tau.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

/// The same quantity from the eigenvalues of the non-Hermitian product
/// `ρ ρ̃`, clamping small negative values to zero.
pub fn concurrence_by_eigenvalues(rho: &QubitDensity) -> Result<f64> {
    let product = rho.matrix() * spin_flip(rho);
    let mut lambdas = Vec::with_capacity(4);
    for z in eigenvalues(&product)? {
        if z.re < -CLAMP_TOLERANCE {
            return Err(Error::Decomposition(format!(
                "spin-flip product has eigenvalue {:e}",
                z.re
            )));
        }
        lambdas.push(z.re.max(0.0).sqrt());
    }
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0))
}

/// `2 |ρ_off|` for the X-shaped single-photon states, where it coincides
/// with the Wootters value.
pub fn concurrence_offdiag(rho_off: C64) -> f64 {
    2.0 * rho_off.norm()
}

/// Schmidt coefficients of a two-qutrit pure state, descending.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtTriple {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl SchmidtTriple {
    /// Sorts the input and checks `k1² + k2² + k3² = 1` within 1e-10.
    pub fn new(k: [f64; 3]) -> Result<Self> {
        if k.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidParameter(format!("Schmidt coefficients must be non-negative, got {k:?}")));
        }
        let norm_sq: f64 = k.iter().map(|x| x * x).sum();
        if (norm_sq - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm_sq });
        }
        let mut k = k;
        k.sort_by(|a, b| b.total_cmp(a));
        Ok(Self {
            k1: k[0],
            k2: k[1],
            k3: k[2],
        })
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.k1, self.k2, self.k3]
    }
}

/// Population of `psi` on labels failing `keep`.
fn outside(psi: &Ket, keep: impl Fn(usize, usize) -> bool) -> f64 {
    psi.basis()
        .iter()
        .zip(psi.amplitudes().iter())
        .filter(|((n1, n2), _)| !keep(*n1, *n2))
        .map(|(_, z)| z.norm_sqr())
        .sum()
}

/// Singular values of the 3x3 coefficient matrix `c[n1][n2]`.
pub fn schmidt_coefficients(psi: &Ket) -> Result<SchmidtTriple> {
    if !psi.is_normalized() {
        return Err(Error::NotNormalized {
            norm_sq: psi.norm_squared(),
        });
    }
    let population = outside(psi, |a, b| a <= 2 && b <= 2);
    if population > LEAKAGE_TOLERANCE {
        return Err(Error::Leakage {
            population,
            block: "two-qutrit",
        });
    }
    let mut c = CMatrix::zeros(3, 3);
    for n1 in 0..3 {
        for n2 in 0..3 {
            c[(n1, n2)] = psi.amplitude(n1, n2);
        }
    }
    let sv = c.singular_values();
    // renormalize away the (at most LEAKAGE_TOLERANCE) discarded weight
    let total = sv.iter().map(|x| x * x).sum::<f64>().sqrt();
    SchmidtTriple::new([sv[0] / total, sv[1] / total, sv[2] / total])
}

/// `C = √(3(k₁²k₂² + k₁²k₃² + k₂²k₃²))`.
pub fn concurrence_qutrit_pure(k: &SchmidtTriple) -> f64 {
    let [a, b, c] = k.as_array().map(|x| x * x);
    (3.0 * (a * b + a * c + b * c)).sqrt().min(1.0)
}

/// Binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// `E = h((1 + √(1 − C²))/2)`.
pub fn eof_from_concurrence(c: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&c) {
        return Err(Error::InvalidParameter(format!("concurrence must lie in [0, 1], got {c}")));
    }
    let c = c.clamp(0.0, 1.0);
    Ok(binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0))
}

/// How a pure component's entanglement was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// A single basis state: no entanglement.
    Trivial,
    /// Two-qubit support: Wootters concurrence.
    Qubit,
    /// Two-qutrit support: Schmidt coefficients.
    Qutrit,
}

/// Picks the evaluation route from the support of `psi`.
pub fn detect_route(psi: &Ket) -> Result<Route> {
    let largest = psi.amplitudes().iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    if psi.norm_squared() - largest <= LEAKAGE_TOLERANCE {
        return Ok(Route::Trivial);
    }
    if outside(psi, |a, b| a <= 1 && b <= 1) <= LEAKAGE_TOLERANCE {
        return Ok(Route::Qubit);
    }
    let population = outside(psi, |a, b| a <= 2 && b <= 2);
    if population <= LEAKAGE_TOLERANCE {
        Ok(Route::Qutrit)
    } else {
        Err(Error::Leakage {
            population,
            block: "two-qutrit",
        })
    }
}

/// Concurrence of a normalized pure state by the route its support allows.
pub fn pure_concurrence(psi: &Ket) -> Result<(Route, f64)> {
    if !psi.is_normalized() {
        return Err(Error::NotNormalized {
            norm_sq: psi.norm_squared(),
        });
    }
    let route = detect_route(psi)?;
    let c = match route {
        Route::Trivial => 0.0,
        Route::Qubit => concurrence_2qubit(&QubitDensity::from_density(&pure_density(psi)?)?)?,
        Route::Qutrit => concurrence_qutrit_pure(&schmidt_coefficients(psi)?),
    };
    Ok((route, c))
}

/// Entanglement of formation of a pure component.
pub fn pure_state_eof(psi: &Ket) -> Result<f64> {
    eof_from_concurrence(pure_concurrence(psi)?.1)
}

/// Convexity bound `E* = Σ wᵢ E(|ψᵢ⟩⟨ψᵢ|)` for a given decomposition.
/// It is an upper bound on the entanglement of the mixture and depends on
/// the decomposition chosen.
pub fn upper_bound_estar(mixture: &[(f64, Ket)]) -> Result<f64> {
    let total: f64 = mixture.iter().map(|(w, _)| w).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("mixture weights sum to {total}, expected 1")));
    }
    let mut estar = 0.0;
    for (w, psi) in mixture {
        if !(*w >= 0.0) {
            return Err(Error::InvalidParameter(format!("negative mixture weight {w}")));
        }
        estar += w * pure_state_eof(psi)?;
    }
    Ok(estar)
}

/// Direct matrix-square-root form of the Wootters `λᵢ`: square roots of
/// the eigenvalues of `√ρ ρ̃ √ρ`. Kept as a cross-check.
pub fn concurrence_by_square_root(rho: &QubitDensity) -> f64 {
    let eig = SymmetricEigen::new(rho.matrix().clone());
    let roots = eig.eigenvalues.map(|x| C64::new(x.max(0.0).sqrt(), 0.0));
    let sqrt_rho = &eig.eigenvectors * CMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint();
    let m = &sqrt_rho * spin_flip(rho) * &sqrt_rho;
    let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut l: Vec<f64> = SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{phi_ket, phi_tilde_ket, single_photon_solution, two_photon_solution, TwoPhotonCase};
    use crate::fock::{build_basis, number_state, re};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn random_unitary(entries: &[f64]) -> CMatrix {
        let n = (entries.len() / 2) as f64;
        let d = n.sqrt() as usize;
        let g = CMatrix::from_iterator(d, d, entries.chunks(2).map(|c| C64::new(c[0], c[1])));
        g.qr().q()
    }

    fn random_state(entries: &[f64]) -> QubitDensity {
        let g = CMatrix::from_iterator(4, 4, entries.chunks(2).map(|c| C64::new(c[0], c[1])));
        let m = &g * g.adjoint();
        let m = &m / m.trace();
        QubitDensity::new((&m + m.adjoint()) * re(0.5)).unwrap()
    }

    fn qubit_of(psi: &Ket) -> QubitDensity {
        QubitDensity::from_density(&pure_density(psi).unwrap()).unwrap()
    }

    #[test]
    fn wootters_examples() {
        let b = build_basis(2);
        assert!((concurrence_2qubit(&qubit_of(&phi_ket(b).unwrap())).unwrap() - 1.0).abs() < 1e-12);
        assert!(concurrence_2qubit(&qubit_of(&number_state(0, 0, b).unwrap())).unwrap().abs() < 1e-12);
        let mut steady = CMatrix::zeros(4, 4);
        steady[(0, 0)] = re(0.5);
        steady[(1, 1)] = re(0.25);
        steady[(2, 2)] = re(0.25);
        steady[(1, 2)] = re(-0.25);
        steady[(2, 1)] = re(-0.25);
        let c = concurrence_2qubit(&QubitDensity::new(steady).unwrap()).unwrap();
        assert!((c - 0.5).abs() < 1e-12);
        assert_eq!(concurrence_offdiag(re(-0.25)), 0.5);
        assert_eq!(concurrence_offdiag(re(0.0)), 0.0);
    }

    #[test]
    fn extraction_refuses_leaking_states() {
        let b = build_basis(2);
        let rho = pure_density(&number_state(0, 2, b).unwrap()).unwrap();
        assert!(matches!(QubitDensity::from_density(&rho), Err(Error::Leakage { .. })));
        // truncation 1 has no |11>; it is read as empty
        let b1 = build_basis(1);
        assert!(QubitDensity::from_density(&pure_density(&phi_ket(b1).unwrap()).unwrap()).is_ok());
    }

    #[test]
    fn offdiag_shortcut_matches_wootters_on_single_photon_states() {
        let b = build_basis(1);
        for k in 0..=20 {
            let a = -1.0 + 0.1 * k as f64;
            for t in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0] {
                let sol = single_photon_solution(a, 1.0, t).unwrap();
                let rho = QubitDensity::from_density(&sol.density(b).unwrap()).unwrap();
                let c = concurrence_2qubit(&rho).unwrap();
                assert!((c - concurrence_offdiag(re(sol.rho_off))).abs() <= 1e-10, "a {a} t {t}");
            }
        }
    }

    #[test]
    fn case_three_concurrence_at_unit_time() {
        let sol = single_photon_solution(FRAC_1_SQRT_2, 1.0, 1.0).unwrap();
        assert!((concurrence_offdiag(re(sol.rho_off)) - (-1.0_f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn schmidt_examples() {
        let b = build_basis(4);
        let k = schmidt_coefficients(&phi_tilde_ket(b).unwrap()).unwrap();
        assert!((k.k1 - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((k.k2 - 0.5).abs() < 1e-12 && (k.k3 - 0.5).abs() < 1e-12);
        assert!((concurrence_qutrit_pure(&k) - 15.0_f64.sqrt() / 4.0).abs() < 1e-12);

        let k = schmidt_coefficients(&number_state(0, 0, b).unwrap()).unwrap();
        assert_eq!(k.as_array(), [1.0, 0.0, 0.0]);
        assert_eq!(concurrence_qutrit_pure(&k), 0.0);

        let r = 1.0 / 3.0_f64.sqrt();
        let ghz = Ket::from_terms(b, &[(0, 0, re(r)), (1, 1, re(r)), (2, 2, re(r))]).unwrap();
        let k = schmidt_coefficients(&ghz).unwrap();
        for x in k.as_array() {
            assert!((x - r).abs() < 1e-12);
        }
        assert!((concurrence_qutrit_pure(&k) - 1.0).abs() < 1e-12);

        assert!(schmidt_coefficients(&number_state(3, 0, b).unwrap()).is_err());
        assert!(schmidt_coefficients(&number_state(1, 1, b).unwrap().scaled(re(2.0))).is_err());
    }

    #[test]
    fn eof_values() {
        assert_eq!(eof_from_concurrence(0.0).unwrap(), 0.0);
        assert!((eof_from_concurrence(1.0).unwrap() - 1.0).abs() < 1e-15);
        let e = eof_from_concurrence(15.0_f64.sqrt() / 4.0).unwrap();
        assert!((e - binary_entropy(0.625)).abs() < 1e-12);
        assert!((e - 0.954434).abs() < 1e-6);
        assert!(eof_from_concurrence(1.1).is_err());
        assert!(eof_from_concurrence(-0.1).is_err());
    }

    #[test]
    fn eof_is_monotone() {
        let mut last = -1.0;
        for k in 0..=1000 {
            let e = eof_from_concurrence(k as f64 / 1000.0).unwrap();
            assert!(e >= last);
            last = e;
        }
    }

    #[test]
    fn routes_by_support() {
        let b = build_basis(2);
        assert_eq!(detect_route(&number_state(0, 2, b).unwrap()).unwrap(), Route::Trivial);
        assert_eq!(detect_route(&phi_ket(b).unwrap()).unwrap(), Route::Qubit);
        assert_eq!(detect_route(&phi_tilde_ket(b).unwrap()).unwrap(), Route::Qutrit);
        let b3 = build_basis(3);
        let wide = Ket::from_terms(b3, &[(3, 0, re(FRAC_1_SQRT_2)), (0, 0, re(FRAC_1_SQRT_2))]).unwrap();
        assert!(detect_route(&wide).is_err());
    }

    #[test]
    fn estar_examples() {
        let b = build_basis(2);
        let start = two_photon_solution(TwoPhotonCase::Product, 1.0, 0.0, b).unwrap();
        assert!(upper_bound_estar(&start.components).unwrap().abs() < 1e-12);
        let late = two_photon_solution(TwoPhotonCase::Product, 1.0, 80.0, b).unwrap();
        let want = 0.25 * binary_entropy(0.625) + 0.5;
        assert!((upper_bound_estar(&late.components).unwrap() - want).abs() < 1e-10);
        assert!((want - 0.738609).abs() < 1e-6);
        let gone = two_photon_solution(TwoPhotonCase::BrightState, 1.0, 80.0, b).unwrap();
        assert!(upper_bound_estar(&gone.components).unwrap().abs() < 1e-12);
        let bad = vec![(0.5, phi_ket(b).unwrap())];
        assert!(upper_bound_estar(&bad).is_err());
    }

    proptest! {
        #[test]
        fn wootters_matches_square_root_form(entries in prop::collection::vec(-1.0f64..1.0, 32)) {
            let rho = random_state(&entries);
            let c = concurrence_2qubit(&rho).unwrap();
            prop_assert!((c - concurrence_by_square_root(&rho)).abs() <= 1e-9);
            prop_assert!((c - concurrence_by_eigenvalues(&rho).unwrap()).abs() <= 1e-7);
        }

        #[test]
        fn wootters_is_local_unitary_invariant(
            state in prop::collection::vec(-1.0f64..1.0, 32),
            ua in prop::collection::vec(-1.0f64..1.0, 8),
            ub in prop::collection::vec(-1.0f64..1.0, 8),
        ) {
            let rho = random_state(&state);
            let u = random_unitary(&ua).kronecker(&random_unitary(&ub));
            let rotated = &u * rho.matrix() * u.adjoint();
            let rotated = QubitDensity::new((&rotated + rotated.adjoint()) * re(0.5)).unwrap();
            let c0 = concurrence_2qubit(&rho).unwrap();
            let c1 = concurrence_2qubit(&rotated).unwrap();
            prop_assert!((c0 - c1).abs() <= 1e-9);
        }

        #[test]
        fn qutrit_concurrence_is_permutation_invariant(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
            prop_assume!(a + b + c > 1e-3);
            let n = (a * a + b * b + c * c).sqrt();
            let k = [a / n, b / n, c / n];
            let base = concurrence_qutrit_pure(&SchmidtTriple::new(k).unwrap());
            for p in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                let q = SchmidtTriple::new([k[p[0]], k[p[1]], k[p[2]]]).unwrap();
                prop_assert!((concurrence_qutrit_pure(&q) - base).abs() <= 1e-15);
            }
        }

        #[test]
        fn schmidt_is_local_unitary_invariant(
            amps in prop::collection::vec(-1.0f64..1.0, 18),
            ua in prop::collection::vec(-1.0f64..1.0, 18),
            ub in prop::collection::vec(-1.0f64..1.0, 18),
        ) {
            let c = CMatrix::from_iterator(3, 3, amps.chunks(2).map(|z| C64::new(z[0], z[1])));
            prop_assume!(c.norm() > 1e-3);
            let c = &c / re(c.norm());
            let b = build_basis(4);
            let to_ket = |m: &CMatrix| {
                let mut terms = Vec::new();
                for n1 in 0..3 {
                    for n2 in 0..3 {
                        terms.push((n1, n2, m[(n1, n2)]));
                    }
                }
                Ket::from_terms(b, &terms).unwrap()
            };
            let rotated = random_unitary(&ua) * &c * random_unitary(&ub).transpose();
            let k0 = schmidt_coefficients(&to_ket(&c)).unwrap();
            let k1 = schmidt_coefficients(&to_ket(&rotated).normalized().unwrap()).unwrap();
            for (x, y) in k0.as_array().iter().zip(k1.as_array()) {
                prop_assert!((x - y).abs() <= 1e-10);
            }
        }
    }
}
